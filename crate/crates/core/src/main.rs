fn main() {
    std::process::exit(swmorse::io::cli::main_with_args(std::env::args_os()));
}
