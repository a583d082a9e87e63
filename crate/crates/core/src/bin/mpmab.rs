fn main() {
    std::process::exit(mpmab::cli::run_cli(std::env::args_os()));
}
