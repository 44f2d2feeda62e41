fn main() {
    std::process::exit(shapeqc::cli::main_with_args(std::env::args_os()));
}
