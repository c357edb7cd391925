fn main() -> std::process::ExitCode {
    ghostfree::report::cli::main()
}
