fn main() {
    std::process::exit(citerank::cli::run(std::env::args_os()));
}
