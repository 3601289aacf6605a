fn main() {
    std::process::exit(honeystat::cli::run(std::env::args_os()));
}
