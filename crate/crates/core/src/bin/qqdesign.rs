fn main() {
    std::process::exit(qqdesign::cli::cli_main(std::env::args_os()));
}
