fn main() -> std::process::ExitCode {
    nscert::cli::main_entry()
}
