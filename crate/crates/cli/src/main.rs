fn main() {
    std::process::exit(moqa_cli::run(std::env::args_os()));
}
