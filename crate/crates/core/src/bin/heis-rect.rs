fn main() -> std::process::ExitCode {
    heis_rect::cli::main()
}
