fn main() {
    std::process::exit(qhedge::cli::main_with_args(std::env::args_os()));
}
