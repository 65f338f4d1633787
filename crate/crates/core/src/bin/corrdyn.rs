fn main() {
    std::process::exit(corrdyn::cli::run(std::env::args_os()));
}
