fn main() {
    std::process::exit(nonceforge::cli::run(std::env::args_os()));
}
