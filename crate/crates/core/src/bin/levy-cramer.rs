fn main() {
    std::process::exit(levy_cramer::cli::main_with_args(std::env::args_os()));
}
