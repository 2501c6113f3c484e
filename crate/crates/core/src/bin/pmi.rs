fn main() {
    std::process::exit(pmi_core::cli::main_with_args(std::env::args_os()));
}
