fn main() {
    std::process::exit(layerheat_harness::cli::main_with_args(std::env::args_os()));
}
