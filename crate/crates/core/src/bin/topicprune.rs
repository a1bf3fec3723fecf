fn main() -> std::process::ExitCode {
    topicprune::cli::main()
}
