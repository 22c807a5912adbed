fn main() -> std::process::ExitCode {
    vrcomfort::cli::main()
}
