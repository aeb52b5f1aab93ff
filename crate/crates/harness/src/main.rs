fn main() {
    std::process::exit(harness::run(std::env::args_os()));
}
