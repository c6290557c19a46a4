fn main() {
    std::process::exit(romp_cli::run(std::env::args_os()));
}
