fn main() {
    std::process::exit(meflut::cli::run(std::env::args_os()));
}
