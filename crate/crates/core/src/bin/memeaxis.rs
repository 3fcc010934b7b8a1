fn main() {
    std::process::exit(memeaxis::cli::run(std::env::args_os()));
}
