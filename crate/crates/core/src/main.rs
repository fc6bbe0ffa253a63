fn main() {
    let code = mespot::cli::run_cli(std::env::args_os());
    std::process::exit(code);
}
