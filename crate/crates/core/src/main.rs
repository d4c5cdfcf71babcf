fn main() {
    std::process::exit(pvar::cli::run(std::env::args_os()));
}
