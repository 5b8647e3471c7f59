fn main() {
    std::process::exit(qvf_cli::run(std::env::args_os()));
}
