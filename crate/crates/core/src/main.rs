fn main() {
    std::process::exit(loschmidt_core::cli::main_with_args(std::env::args_os()));
}
