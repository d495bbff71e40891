fn main() {
    std::process::exit(superspin::cli::run(std::env::args_os()));
}
