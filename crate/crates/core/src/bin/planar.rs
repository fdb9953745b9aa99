fn main() {
    std::process::exit(planar_stability::cli::run(std::env::args_os()));
}
