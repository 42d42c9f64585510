fn main() {
    std::process::exit(mertens::cli::main_with_args(std::env::args_os()));
}
