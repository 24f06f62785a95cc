fn main() {
    std::process::exit(eegimg_cli::cli::main_entry());
}
