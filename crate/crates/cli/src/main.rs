fn main() {
    std::process::exit(polyapprox_cli::run_command(std::env::args_os()));
}
