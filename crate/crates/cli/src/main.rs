fn main() {
    std::process::exit(ncgm_cli::run(std::env::args_os()));
}
