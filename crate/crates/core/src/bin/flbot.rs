fn main() {
    std::process::exit(flbot::cli::run());
}
