fn main() {
    std::process::exit(colorgrid_cli::run(std::env::args_os()));
}
