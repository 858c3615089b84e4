fn main() {
    std::process::exit(wavescat_cli::main_with_args(std::env::args_os()));
}
