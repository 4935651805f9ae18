fn main() {
    std::process::exit(gse_tail::cli::main_with_args(std::env::args_os()));
}
