fn main() {
    std::process::exit(borerdyn_cli::run(std::env::args_os()));
}
