#!/usr/bin/env node
import { main } from "../dist/main.js";

process.exit(main(process.argv.slice(2)));
