fn main() {
    std::process::exit(flagcurv::cli::main_with_args(std::env::args_os()));
}
