fn main() {
    spanrec::cli::main()
}
