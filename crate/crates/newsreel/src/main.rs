fn main() -> std::process::ExitCode {
    newsreel::cli::main()
}
