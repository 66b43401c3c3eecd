fn main() -> std::process::ExitCode {
    cachedos::cli::main()
}
