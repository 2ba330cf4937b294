from fole.cli import main

main()
