//! Agreement of two toy raters with a reference rater on 63 generated shapes
//! (62 rated Good, one Bad), printed as a report table.

use shapeqc::metrics::{prediction_rates, AgreementReport, ModelReport, ReferenceRates};
use shapeqc::QualityLabel::{Bad, Good};

fn main() -> shapeqc::Result<()> {
    let mut reference = vec![Good; 63];
    reference[17] = Bad;
    let (good_pct, bad_pct) = prediction_rates(&reference)?;

    let mut report = AgreementReport {
        reference: Some(ReferenceRates {
            rater: "expert".into(),
            good_pct,
            bad_pct,
        }),
        models: Vec::new(),
    };
    for (name, pred) in [("always_good", vec![Good; 63]), ("copy_of_expert", reference.clone())] {
        let mut row = ModelReport::empty(name);
        row.set_agreement(&reference, &pred)?;
        report.models.push(row);
    }
    print!("{}", report.to_text());
    Ok(())
}
