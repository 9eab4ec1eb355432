fn main() {
    std::process::exit(tccr_cli::run(std::env::args_os()));
}
