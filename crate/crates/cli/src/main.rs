fn main() {
    std::process::exit(peakon_cli::run(std::env::args_os()));
}
