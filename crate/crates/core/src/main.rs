fn main() {
    std::process::exit(anoncomm::cli::main_with(std::env::args_os()));
}
