fn main() {
    std::process::exit(rpz::cli::run_cli(std::env::args_os()));
}
