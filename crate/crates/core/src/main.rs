fn main() -> std::process::ExitCode {
    keytag::cli::main()
}
