fn main() {
    std::process::exit(mgt_memory::cli::main_with_args(std::env::args_os()));
}
