fn main() {
    std::process::exit(nearsq_cli::main_with_args(std::env::args_os()));
}
