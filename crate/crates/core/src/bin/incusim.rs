fn main() -> std::process::ExitCode {
    incusim::cli::main()
}
