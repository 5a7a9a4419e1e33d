fn main() {
    std::process::exit(safebo::cli::cli_main(std::env::args_os()));
}
