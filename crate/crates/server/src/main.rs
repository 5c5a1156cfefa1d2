fn main() -> std::process::ExitCode {
    docasm_server::cli::main()
}
