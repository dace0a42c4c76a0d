from largesol.cli import main

raise SystemExit(main())
