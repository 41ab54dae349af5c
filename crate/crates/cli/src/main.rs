fn main() {
    std::process::exit(noncurv_cli::main_with_args(std::env::args_os()));
}
