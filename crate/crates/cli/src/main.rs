fn main() {
    std::process::exit(komatsu_cli::run(std::env::args_os()));
}
