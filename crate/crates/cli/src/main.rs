fn main() {
    std::process::exit(locadapt_cli::main_with(std::env::args_os()));
}
