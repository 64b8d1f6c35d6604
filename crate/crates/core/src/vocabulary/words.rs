//! Bundled word lists for English-like vocabularies.

/// Verb-like predicate names.
pub const VERBS: &[&str] = &[
    "Boom", "Exercise", "Admire", "Adopt", "Advise", "Agree", "Allow", "Amuse", "Announce",
    "Answer", "Appear", "Applaud", "Approve", "Argue", "Arrange", "Arrive", "Ask", "Attach",
    "Attack", "Attend", "Avoid", "Bake", "Balance", "Ban", "Bathe", "Battle", "Beg", "Behave",
    "Belong", "Bleach", "Bless", "Blink", "Blush", "Boast", "Boil", "Bolt", "Bomb", "Book",
    "Bore", "Borrow", "Bounce", "Bow", "Box", "Brake", "Branch", "Breathe", "Bruise", "Brush",
    "Bubble", "Bump", "Burn", "Bury", "Buzz", "Calculate", "Call", "Camp", "Care", "Carry",
    "Carve", "Cause", "Challenge", "Change", "Charge", "Chase", "Cheat", "Check", "Cheer", "Chew",
    "Choke", "Chop", "Claim", "Clap", "Clean", "Clear", "Clip", "Close", "Coach", "Coil",
    "Collect", "Colour", "Comb", "Command", "Communicate", "Compare", "Compete", "Complain",
    "Complete", "Concentrate", "Concern", "Confess", "Confuse", "Connect", "Consider", "Consist",
    "Contain", "Continue", "Copy", "Correct", "Cough", "Count", "Cover", "Crack", "Crash",
    "Crawl", "Cross", "Crush", "Cry", "Cure", "Curl", "Curve", "Cycle", "Dam", "Damage", "Dance",
    "Dare", "Decay", "Deceive", "Decide", "Decorate", "Delay", "Delight", "Deliver", "Depend",
    "Describe", "Desert", "Deserve", "Destroy", "Detect", "Develop", "Disagree", "Disappear",
    "Discover", "Dislike", "Divide", "Double", "Doubt", "Drag", "Drain", "Dream", "Dress", "Drip",
    "Drop", "Drown", "Dry", "Dust", "Earn", "Educate", "Embarrass", "Employ", "Empty",
    "Encourage", "End", "Enjoy", "Enter", "Entertain", "Escape", "Examine", "Excite", "Excuse",
    "Exist", "Expand", "Expect", "Explain", "Explode", "Extend", "Face", "Fade", "Fail", "Fancy",
    "Fasten", "Fax", "Fear", "Fence", "Fetch", "File", "Fill", "Film", "Fire", "Fit", "Fix",
    "Flap", "Flash", "Float", "Flood", "Flow", "Flower", "Fold", "Follow", "Fool", "Force",
    "Form", "Found", "Frame", "Frighten", "Fry", "Gather", "Gaze", "Glow", "Glue", "Grab",
    "Grate", "Grease", "Greet", "Grin", "Grip", "Groan", "Guarantee", "Guard", "Guess", "Guide",
    "Hammer", "Hand", "Handle", "Hang", "Happen", "Harm", "Hate", "Haunt", "Head", "Heal", "Heap",
    "Heat", "Help", "Hook", "Hop", "Hope", "Hover", "Hug", "Hum", "Hunt", "Hurry", "Identify",
    "Ignore", "Imagine", "Impress", "Improve", "Include", "Increase", "Influence", "Inform",
    "Inject", "Injure", "Instruct", "Intend", "Interest", "Interfere", "Interrupt", "Introduce",
    "Invent", "Invite", "Irritate", "Itch", "Jail", "Jam", "Jog", "Join", "Joke", "Judge",
    "Juggle", "Jump", "Kick", "Kill", "Kiss", "Kneel", "Knit", "Knock", "Knot", "Label", "Land",
    "Last", "Laugh", "Launch", "Learn", "Level", "License", "Lick", "Lie", "Lighten", "Like",
    "List", "Listen", "Live", "Load", "Lock", "Long", "Look", "Love", "Manage", "March", "Mark",
    "Marry", "Match", "Mate", "Matter", "Measure", "Melt", "Memorize", "Mend", "Milk", "Mine",
    "Miss", "Mix", "Moan", "Moor", "Mourn", "Move", "Muddle", "Mug", "Multiply", "Murder", "Nail",
    "Name", "Need", "Nest", "Nod", "Note", "Notice", "Number", "Obey", "Object", "Observe",
    "Obtain", "Occur", "Offend", "Offer", "Open", "Order", "Overflow", "Owe", "Own", "Pack",
    "Paddle", "Paint", "Park", "Part", "Pass", "Paste", "Pat", "Pause", "Peck", "Pedal", "Peel",
    "Peep", "Perform", "Permit", "Phone", "Pick", "Pinch", "Pine", "Place", "Plan", "Plant",
    "Play", "Please", "Plug", "Point", "Poke", "Polish", "Pop", "Possess", "Post", "Pour",
    "Practise", "Pray", "Preach", "Precede", "Prefer", "Prepare", "Present", "Preserve", "Press",
    "Pretend", "Prevent", "Prick", "Print", "Produce", "Program", "Promise", "Protect", "Provide",
    "Pull", "Pump", "Punch", "Puncture", "Punish", "Push", "Question", "Queue", "Race", "Radiate",
    "Rain", "Raise", "Reach", "Realise", "Receive", "Recognise", "Record", "Reduce", "Reflect",
    "Refuse", "Regret", "Reign", "Reject", "Rejoice", "Relax", "Release", "Rely", "Remain",
    "Remember", "Remind", "Remove", "Repair", "Repeat", "Replace", "Reply", "Report", "Reproduce",
    "Request", "Rescue", "Retire", "Return", "Rhyme", "Rinse", "Risk", "Rob", "Rock", "Roll",
    "Rot", "Rub", "Ruin", "Rule", "Rush", "Sack", "Sail", "Satisfy", "Save", "Saw", "Scare",
    "Scatter", "Scold", "Scorch", "Scrape", "Scratch", "Scream", "Screw", "Scribble", "Scrub",
    "Seal", "Search", "Separate", "Serve", "Settle", "Shade", "Share", "Shave", "Shelter",
    "Shiver", "Shock", "Shop", "Shrug", "Sigh", "Sign", "Signal", "Sin", "Sip", "Ski", "Skip",
    "Slap", "Slip", "Slow", "Smash", "Smell", "Smile", "Smoke", "Snatch", "Sneeze", "Sniff",
    "Snore", "Snow", "Soak", "Soothe", "Sound", "Spare", "Spark", "Sparkle", "Spell", "Spill",
    "Spoil", "Spot", "Spray", "Sprout", "Squash", "Squeak", "Squeal", "Squeeze", "Stain", "Stamp",
    "Stare", "Start", "Stay", "Steer", "Step", "Stir", "Stitch", "Stop", "Store", "Strap",
    "Strengthen", "Stretch", "Strip", "Stroke", "Stuff", "Subtract", "Succeed", "Suck", "Suffer",
    "Suggest", "Suit", "Supply", "Support", "Suppose", "Surprise", "Surround", "Suspect",
    "Suspend", "Switch", "Talk", "Tame", "Tap", "Taste", "Tease", "Telephone", "Tempt", "Terrify",
    "Test", "Thank", "Thaw", "Tick", "Tickle", "Tie", "Time", "Tip", "Tire", "Touch", "Tour",
    "Tow", "Trace", "Trade", "Train", "Transport", "Trap", "Travel", "Treat", "Tremble", "Trick",
    "Trip", "Trot", "Trouble", "Trust", "Try", "Tug", "Tumble", "Turn", "Twist", "Type",
    "Undress", "Unfasten", "Unite", "Unlock", "Unpack", "Untidy", "Use", "Vanish", "Visit",
    "Wail", "Wait", "Walk", "Wander", "Want", "Warm", "Warn", "Wash", "Waste", "Watch", "Water",
    "Wave", "Weigh", "Welcome", "Whine", "Whip", "Whirl", "Whisper", "Whistle", "Wink", "Wipe",
    "Wish", "Wobble", "Wonder", "Work", "Worry", "Wrap", "Wreck", "Wrestle", "Wriggle", "Yawn",
    "Yell", "Zip", "Zoom",
];

/// Person-like object names.
pub const NAMES: &[&str] = &[
    "Richard", "Yolonda", "Aaron", "Abigail", "Adrian", "Agnes", "Albert", "Alice", "Alvin",
    "Amanda", "Amelia", "Andre", "Angela", "Anita", "Anthony", "Arthur", "Audrey", "Barbara",
    "Beatrice", "Benjamin", "Bernard", "Beverly", "Brenda", "Brian", "Bridget", "Bruce", "Byron",
    "Caleb", "Calvin", "Camila", "Carlos", "Carmen", "Caroline", "Cecilia", "Cedric", "Charlotte",
    "Chester", "Chloe", "Clara", "Clifford", "Colin", "Cora", "Craig", "Cynthia", "Damian",
    "Daniel", "Daphne", "Darius", "Deborah", "Delia", "Dennis", "Derek", "Diana", "Dolores",
    "Dominic", "Donna", "Dorothy", "Douglas", "Dwight", "Edgar", "Edith", "Edmund", "Eileen",
    "Elaine", "Eleanor", "Elias", "Elijah", "Eliza", "Elliot", "Eloise", "Emil", "Emma",
    "Enrique", "Esther", "Eugene", "Evelyn", "Felix", "Fiona", "Florence", "Francis", "Frederick",
    "Gabriel", "Gavin", "Genevieve", "Georgia", "Gerald", "Gideon", "Gilbert", "Gloria", "Gordon",
    "Grace", "Gregory", "Gwen", "Harold", "Harriet", "Hazel", "Hector", "Helen", "Henrietta",
    "Herbert", "Hilda", "Howard", "Hugo", "Ian", "Imogen", "Ingrid", "Irene", "Isaac", "Isabel",
    "Ivan", "Jacob", "Janet", "Jasper", "Jeanette", "Jerome", "Jessica", "Joan", "Joel", "Jonah",
    "Josephine", "Judith", "Julian", "Juliet", "Karen", "Katherine", "Keith", "Kendra", "Kenneth",
    "Kimberly", "Lance", "Laura", "Lawrence", "Leah", "Leonard", "Leslie", "Lillian", "Lionel",
    "Lorraine", "Lucas", "Lucinda", "Luther", "Lydia", "Mabel", "Malcolm", "Marcus", "Margaret",
    "Marian", "Marvin", "Matilda", "Maurice", "Maxine", "Melvin", "Meredith", "Miguel", "Mildred",
    "Miriam", "Morgan", "Myra", "Nadia", "Nathan", "Neil", "Nicole", "Nigel", "Nora", "Norman",
    "Olive", "Oliver", "Olivia", "Oscar", "Pamela", "Patrick", "Pauline", "Percy", "Philip",
    "Phoebe", "Priscilla", "Quentin", "Rachel", "Ralph", "Raymond", "Rebecca", "Reginald",
    "Rhonda", "Roberta", "Rodney", "Roland", "Rosalind", "Rupert", "Ruth", "Samuel", "Sandra",
    "Selena", "Sharon", "Sheldon", "Sibyl", "Simon", "Sophia", "Stanley", "Stella", "Stuart",
    "Sylvia", "Tabitha", "Terrence", "Thelma", "Theodore", "Tobias", "Trevor", "Ursula",
    "Valerie", "Vernon", "Victor", "Vincent", "Viola", "Virginia", "Wallace", "Walter", "Wanda",
    "Warren", "Wendell", "Wilfred", "Winifred", "Xavier", "Yvette", "Yvonne", "Zachary", "Zelda",
];
