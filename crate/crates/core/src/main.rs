fn main() {
    std::process::exit(ssbound::cli::run(std::env::args_os()));
}
