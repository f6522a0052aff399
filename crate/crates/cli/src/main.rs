fn main() {
    std::process::exit(fraclab_cli::run_command(std::env::args_os()));
}
