fn main() {
    std::process::exit(edgeexplain::cli::main_with_args(std::env::args_os()));
}
