fn main() {
    std::process::exit(marx::run(std::env::args_os()));
}
