fn main() {
    wigner_flow::cli::main()
}
