fn main() {
    std::process::exit(shellsym::cli::main_exit_code());
}
