fn main() {
    std::process::exit(splitfactor::cli::run(std::env::args_os()));
}
