from drw_pubsub.cli import main

raise SystemExit(main())
