fn main() {
    std::process::exit(shapedpulse::cli::main_with_args(std::env::args_os()));
}
