fn main() {
    std::process::exit(wordsmith_cli::run(std::env::args_os()));
}
