fn main() {
    std::process::exit(lime_stability::cli::run(std::env::args_os()));
}
