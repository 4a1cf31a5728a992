fn main() -> std::process::ExitCode {
    exaug::cli::run(std::env::args_os())
}
