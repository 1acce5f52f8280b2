fn main() {
    std::process::exit(ebus_cli::run(std::env::args_os()));
}
