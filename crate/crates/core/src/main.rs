fn main() {
    std::process::exit(pcbrs::cli::run(std::env::args_os()));
}
