fn main() {
    std::process::exit(braidstab_cli::main_with_args(std::env::args_os()));
}
