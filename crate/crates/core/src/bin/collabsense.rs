fn main() {
    std::process::exit(collabsense::cli::main_entry());
}
