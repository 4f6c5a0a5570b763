fn main() -> std::process::ExitCode {
    wbasn_sim::cli::run_cli(std::env::args_os())
}
