fn main() -> std::process::ExitCode {
    isoquad::cli::main()
}
