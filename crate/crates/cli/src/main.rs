fn main() {
    std::process::exit(alamouti_blind_cli::parse_and_run(std::env::args_os()));
}
