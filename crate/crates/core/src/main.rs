fn main() {
    std::process::exit(khmrotate::harness::cli_main(std::env::args_os()));
}
